public class OrderTransformer extends CustomerTransformer{
    public String transformOrder(Order order){
        return "Order reference number " + order.getId() + "\n" +       this.transformCustomer(order.getCustomer());
    }
}
